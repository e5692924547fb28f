"""Test suite for Expense Manager Bot."""
