"""
- **Module:** `src/sasshalab/sharpness/__init__.py`
"""
