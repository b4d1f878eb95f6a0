"""Utility functions for MetaCache"""
