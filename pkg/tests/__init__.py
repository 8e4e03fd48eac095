"""
Test suite for the DQLS toolkit
"""
