"""
- **Module:** `src/sasshalab/exception/__init__.py`
"""
