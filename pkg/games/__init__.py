"""Network polymatrix games: model, catalog and file format."""
