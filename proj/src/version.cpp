#include "dsoup/version.hpp"

#ifndef DSOUP_BUILD_ID
#define DSOUP_BUILD_ID "0.0.0+unversioned"
#endif

namespace dsoup {

const char* build_id() { return DSOUP_BUILD_ID; }

}  // namespace dsoup
