"""
- **Module:** `src/sasshalab/numkit/__init__.py`
"""
