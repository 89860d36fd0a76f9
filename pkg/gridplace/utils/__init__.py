"""
Utility modules: exceptions, validators, concurrency, fixtures and command dependencies.
"""
