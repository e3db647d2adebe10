"""
- **Module:** `src/sasshalab/optimizers/__init__.py`
"""
