# Test suite