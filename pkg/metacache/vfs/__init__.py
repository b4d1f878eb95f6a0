"""Simulated VFS lookup pipeline over a countable disk model"""
