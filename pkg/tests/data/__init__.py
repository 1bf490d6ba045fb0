# Data tests package 