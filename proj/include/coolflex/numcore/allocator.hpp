#pragma once

namespace coolflex::numcore {

/// Asks the C allocator to keep freed blocks instead of returning them to
/// the OS. Tapes allocate and release the same large matrices on every
/// evaluation; without this most of the time goes to page faults. No-op
/// outside glibc; safe to call repeatedly.
void retain_freed_memory();

}  // namespace coolflex::numcore
