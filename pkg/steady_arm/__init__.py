"""steady-arm, a desk-scale laboratory for end-effector stabilization."""
