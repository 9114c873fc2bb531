"""
Test suite for bpa-bisim.
"""
