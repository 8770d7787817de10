int scale2(int v) {
  return v * 2;
}

void call_case(int a[4], int b[4]) {
  L0: for (int i = 0; i < 4; i++) {
    b[i] = scale2(a[i]);
  }
}
