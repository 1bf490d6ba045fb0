# Theory tests package 