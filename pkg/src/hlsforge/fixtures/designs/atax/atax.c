// A^T (A x); two reduction loops over the same matrix
#define NR 48

void atax(const int A[NR][NR], const int x[NR], int y[NR]) {
  int tmp[NR];
  // HLSFORGE_LABEL: l1
  for (int i = 0; i < NR; i++) {
    int acc = 0;
    for (int j = 0; j < NR; j++)
      acc += A[i][j] * x[j];
    tmp[i] = acc;
  }
  // HLSFORGE_LABEL: l2
  for (int j = 0; j < NR; j++) {
    int acc = 0;
    for (int i = 0; i < NR; i++)
      acc += A[i][j] * tmp[i];
    y[j] = acc;
  }
}
