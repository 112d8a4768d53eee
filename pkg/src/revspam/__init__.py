"""Spam review detection over Amazon-style review corpora."""
