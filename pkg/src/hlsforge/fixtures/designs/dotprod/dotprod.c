// plain dot product reduction
#define ND 256

int dotprod(const int a[ND], const int b[ND]) {
  int acc = 0;
  // HLSFORGE_LABEL: d1
  for (int i = 0; i < ND; i++)
    acc += a[i] * b[i];
  return acc;
}
