# Utils tests package 