/* P3: gasoline variant */
#if G == 1
g();
#if A == 1
a();
#endif
#endif
#ifdef B
#if B == 1
b();
#endif
#endif
#if E
e();
#if H == 1
h();
#endif
#endif
