#include "pgrid/migrate.hpp"

#include <cstdlib>

namespace pgrid {

const char* to_string(MigrationOutcome o) {
    switch (o) {
        case MigrationOutcome::MIGRATED: return "migrated";
        case MigrationOutcome::SKIPPED: return "skipped";
        case MigrationOutcome::TARGET_REFUSED: return "target_refused";
        case MigrationOutcome::EXECUTOR_FAILED: return "executor_failed";
    }
    return "?";
}

MigrationOutcome CommandExecutor::execute(const MigrationDecision& d) {
    ::setenv("TARGET_ADDR", d.target.address().c_str(), 1);
    ::setenv("TARGET_PORT", std::to_string(d.target.port).c_str(), 1);
    ::setenv("TASK_ID", d.task_id.c_str(), 1);
    const int rc = std::system(command_.c_str());
    return rc == 0 ? MigrationOutcome::MIGRATED : MigrationOutcome::EXECUTOR_FAILED;
}

MigrationOutcome execute_migration(const MigrationDecision& decision,
                                   MigrationExecutor& executor) {
    return executor.execute(decision);
}

}  // namespace pgrid
