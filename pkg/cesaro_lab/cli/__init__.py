"""CLI module for cesaro-lab."""
