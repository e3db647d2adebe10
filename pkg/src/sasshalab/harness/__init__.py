"""
- **Module:** `src/sasshalab/harness/__init__.py`
"""
