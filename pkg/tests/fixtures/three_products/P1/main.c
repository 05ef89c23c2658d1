#if A == 1
a();
#endif
#if C == 1
c();
#if B == 1
b();
#endif
#endif
#if D == 1
d();
#endif
