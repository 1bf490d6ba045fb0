# Simulator tests package 