"""
Test suite for the dga_detector package.

Unit tests per module, CLI tests and end-to-end tests on synthetic fixtures.
"""
