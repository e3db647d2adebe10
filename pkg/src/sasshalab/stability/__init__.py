"""
- **Module:** `src/sasshalab/stability/__init__.py`
"""
