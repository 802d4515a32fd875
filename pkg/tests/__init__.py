"""Tests for the gameproof package."""
