#pragma once

namespace faceprior::cli {

/// Entry point of the `faceprior` tool. Returns the process exit status:
/// 0 success, 2 missing file, 3 invalid config or usage, 4 numerical or format error.
int run(int argc, char** argv);

}  // namespace faceprior::cli
