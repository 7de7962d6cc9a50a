// one Jacobi relaxation sweep over a 1-D rod
#define NJ 50

void jacobi1d(const int in[NJ], int out[NJ]) {
  // HLSFORGE_LABEL: j1
  for (int i = 1; i < NJ - 1; i++)
    out[i] = (in[i - 1] + in[i] + in[i + 1]) / 3;
}
