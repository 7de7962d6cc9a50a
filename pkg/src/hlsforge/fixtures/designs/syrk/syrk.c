// symmetric rank-k update with a partitionable accumulator
#define NS 24

void syrk(int alpha, const int A[NS][NS], int C[NS][NS]) {
  // HLSFORGE_LABEL: cbuf
  static int cbuf[576];
  // HLSFORGE_LABEL: s1
  for (int i = 0; i < NS; i++)
    for (int j = 0; j < NS; j++)
      cbuf[i * NS + j] = C[i][j];
  // HLSFORGE_LABEL: s2
  for (int i = 0; i < NS; i++) {
    for (int j = 0; j <= i; j++) {
      int acc = cbuf[i * NS + j];
      for (int k = 0; k < NS; k++)
        acc += alpha * A[i][k] * A[j][k];
      C[i][j] = acc;
    }
  }
}
