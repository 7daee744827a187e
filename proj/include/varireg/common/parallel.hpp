#pragma once

namespace varireg {

// Worker cap for internal parallel loops. 0 means "use the runtime default".
void set_thread_count(int threads);
int thread_count();

}  // namespace varireg
