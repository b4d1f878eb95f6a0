"""
MetaCache - LSM-tree metadata cache for filesystem inode records
"""

__version__ = "1.0.0"
