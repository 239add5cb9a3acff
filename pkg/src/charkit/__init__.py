"""charkit: exact formal characters for affine sl2 and the N=2 superconformal algebra."""
