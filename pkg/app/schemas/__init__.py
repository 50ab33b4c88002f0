"""Pydantic schemas - run config, datasets, metrics and training records"""
