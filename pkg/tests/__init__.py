"""Test suite for psido-lab."""
