// C = alpha*A*B + beta*C on a small square tile
#define NG 16

void gemm(int alpha, int beta, const int A[NG][NG], const int B[NG][NG], int C[NG][NG]) {
  // HLSFORGE_LABEL: i1
  for (int i = 0; i < NG; i++) {
    // HLSFORGE_LABEL: j1
    for (int j = 0; j < NG; j++) {
      int acc = C[i][j] * beta;
      // HLSFORGE_LABEL: k1
      for (int k = 0; k < NG; k++)
        acc += alpha * A[i][k] * B[k][j];
      C[i][j] = acc;
    }
  }
}
