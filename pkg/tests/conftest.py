# Keeps the tests directory importable (the acceptance suite reuses the
# label-spec generators from test_arclabel).
