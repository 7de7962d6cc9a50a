// sparse matrix-vector product, ELLPACK layout
#define ROWS 96
#define NNZ 10

void spmv(const int cols[ROWS][NNZ], const int x[960], int y[ROWS]) {
  // HLSFORGE_LABEL: vals
  static long vals[960];
  // HLSFORGE_LABEL: sp1
  for (int i = 0; i < ROWS; i++) {
    int acc = 0;
    for (int k = 0; k < NNZ; k++)
      acc += vals[i * NNZ + k] * x[cols[i][k]];
    y[i] = acc;
  }
}
