// 5-point stencil over a 2-D grid
#define H 30
#define W 30

void stencil2d(const int in[H][W], int out[H][W]) {
  // HLSFORGE_LABEL: st1
  for (int i = 1; i < H - 1; i++) {
    // HLSFORGE_LABEL: st2
    for (int j = 1; j < W - 1; j++) {
      out[i][j] = in[i][j] + in[i - 1][j] + in[i + 1][j] + in[i][j - 1] + in[i][j + 1];
    }
  }
}
