"""Shipped numerical constants.

Generated by msregret.lfp.write_constants; do not edit by hand.
"""

TAU_STAR = 1.22814
