"""
- **Module:** `src/sasshalab/__init__.py`

Desk-scale laboratory for sharpness-aware second-order optimization.
"""

__version__ = "0.1.0"
