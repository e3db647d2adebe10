"""
- **Module:** `src/sasshalab/estimators/__init__.py`
"""
