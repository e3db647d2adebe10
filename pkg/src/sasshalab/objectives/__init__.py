"""
- **Module:** `src/sasshalab/objectives/__init__.py`
"""
