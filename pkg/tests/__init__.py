"""Tests for dyncred."""
