// 1-D convolution with a 5-tap kernel
#define NC 128

void conv1d(const int x[NC], const int w[5], int y[NC]) {
  // HLSFORGE_LABEL: c1
  for (int i = 2; i < NC - 2; i++) {
    int acc = 0;
    for (int t = -2; t <= 2; t++)
      acc += x[i + t] * w[t + 2];
    y[i] = acc;
  }
}
