#include "sample.h"

#if VAR1 > 0 && VAR2 != 0
  #if VAR3 != 1
    void var3_code(void) { run(); }
  #endif
  /* consistency check, generated */
  #ifndef VAR3
    #error "VAR3 is not defined"
  #endif
#endif
