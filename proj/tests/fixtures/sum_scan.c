void sum_scan(int bucket[128], int sum[1]) {
  int s;
  s = 0;
  L1: for (int i = 0; i < 128; i++) {
    s = s + bucket[i];
    bucket[i] = s;
  }
  sum[0] = s;
}
