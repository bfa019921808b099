#pragma once

#include <string>

#include "pgrid/node.hpp"

namespace pgrid {

enum class MigrationOutcome { MIGRATED, SKIPPED, TARGET_REFUSED, EXECUTOR_FAILED };

const char* to_string(MigrationOutcome o);

// Carries out a migration decision. The simulator moves synthetic task
// demand between ledgers; the daemon shells out to a configured command.
// A refused or failed migration leaves the task where it was.
class MigrationExecutor {
public:
    virtual ~MigrationExecutor() = default;
    virtual MigrationOutcome execute(const MigrationDecision& decision) = 0;
};

// Logs-and-does-nothing executor (daemon default).
class NoopExecutor : public MigrationExecutor {
public:
    MigrationOutcome execute(const MigrationDecision&) override {
        return MigrationOutcome::SKIPPED;
    }
};

// Runs a shell command with TARGET_ADDR, TARGET_PORT and TASK_ID exported;
// exit 0 means the process was migrated.
class CommandExecutor : public MigrationExecutor {
public:
    explicit CommandExecutor(std::string command) : command_(std::move(command)) {}
    MigrationOutcome execute(const MigrationDecision& decision) override;

private:
    std::string command_;
};

MigrationOutcome execute_migration(const MigrationDecision& decision,
                                   MigrationExecutor& executor);

}  // namespace pgrid
