// BiCG sub-kernel: row and column products of one matrix
#define NB 32

void bicg(const int A[NB][NB], const int p[NB], const int r[NB], int q[NB], int s[NB]) {
  // HLSFORGE_LABEL: mat
  static int mat[1024];
  // HLSFORGE_LABEL: r1
  for (int i = 0; i < NB; i++) {
    int acc = 0;
    for (int j = 0; j < NB; j++) {
      mat[i * NB + j] = A[i][j];
      acc += A[i][j] * p[j];
    }
    q[i] = acc;
  }
  // HLSFORGE_LABEL: c1
  for (int j = 0; j < NB; j++) {
    int acc = 0;
    for (int i = 0; i < NB; i++)
      acc += r[i] * mat[i * NB + j];
    s[j] = acc;
  }
}
