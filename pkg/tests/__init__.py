"""Test suite for mobisim."""
