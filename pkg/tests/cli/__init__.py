# CLI tests package 