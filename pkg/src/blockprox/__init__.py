"""Block prox-linear optimization toolkit."""
