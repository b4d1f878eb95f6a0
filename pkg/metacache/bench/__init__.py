"""Workload generation, trace replay and strace-style reports"""
