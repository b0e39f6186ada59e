"""
Test suite for qthermo
"""