#pragma once

namespace kryrank {

/// Entry point of the `kryrank` tool. Returns 0 on success, 1 on usage
/// errors and 2 on data errors.
int cli_main(int argc, char** argv);

}  // namespace kryrank
