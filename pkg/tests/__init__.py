"""Tests for the k-space, mask, training, evaluation and CLI layers"""
