# Periodic BVP Package