# Algorithm tests package 