"""
- **Module:** `src/sasshalab/autodiff/__init__.py`
"""
