// two dependent matrix-vector products
#define NV 40

void mvt(const int A[NV][NV], int x1[NV], int x2[NV], const int y1[NV], const int y2[NV]) {
  // HLSFORGE_LABEL: m1
  for (int i = 0; i < NV; i++) {
    int acc = x1[i];
    for (int j = 0; j < NV; j++)
      acc += A[i][j] * y1[j];
    x1[i] = acc;
  }
  // HLSFORGE_LABEL: m2
  for (int i = 0; i < NV; i++) {
    int acc = x2[i];
    for (int j = 0; j < NV; j++)
      acc += A[j][i] * y2[j];
    x2[i] = acc;
  }
}
