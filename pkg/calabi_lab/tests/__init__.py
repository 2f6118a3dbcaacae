"""
Unit tests for calabi_lab
"""
