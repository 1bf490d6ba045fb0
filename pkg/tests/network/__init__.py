# Network tests package 