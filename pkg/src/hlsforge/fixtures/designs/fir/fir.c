// shift-register FIR filter
#define NF 64

void fir(const int x[NF], int y[NF]) {
  // HLSFORGE_LABEL: coeff
  static const int coeff[NF] = {1};
  static int shift[NF];
  // HLSFORGE_LABEL: f1
  for (int i = 0; i < NF; i++) {
    int acc = 0;
    for (int t = NF - 1; t > 0; t--)
      shift[t] = shift[t - 1];
    shift[0] = x[i];
    for (int t = 0; t < NF; t++)
      acc += shift[t] * coeff[t];
    y[i] = acc;
  }
}
