# This file makes the 'broadcast_sim' directory a Python package.
