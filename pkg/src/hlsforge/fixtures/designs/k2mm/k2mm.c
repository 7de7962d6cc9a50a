// two chained matrix products, the classic three-deep loop nest
#define N 64
#define M 32

void k2mm(const int A[N][N], const int B[N][N], const int D[N][M], int E[N][M]) {
  int tmp[N][N];
  // HLSFORGE_LABEL: lp1
  for (int i = 0; i < N; i++) {
    // HLSFORGE_LABEL: lp2
    for (int j = 0; j < N; j++) {
      int acc = 0;
      for (int k = 0; k < N; k++)
        acc += A[i][k] * B[k][j];
      tmp[i][j] = acc;
    }
  }
  // HLSFORGE_LABEL: lp3
  for (int j = 0; j < M; j++)
    for (int i = 0; i < N; i++)
      E[i][j] = tmp[i][j] * D[i][j];
}
