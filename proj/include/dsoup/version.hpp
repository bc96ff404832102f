#pragma once

namespace dsoup {

/// Build identifier ("<version>+<git rev>") embedded in emitted artifacts.
const char* build_id();

}  // namespace dsoup
