#pragma once

// Deterministic parallel execution for period subproblems. A worker pool maps
// tasks by period ownership, a coordinator folds results in fixed period
// order, and a one-shot deferred runner lets the incumbent search overlap the
// next solve phase. Nothing here may make results depend on worker count:
// workers write to disjoint slots, reductions happen on the coordinator, and
// failures are reported by lowest period index rather than completion order.

#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "battplan/errors.hpp"

namespace battplan {

enum class ExecPolicy { Sync, AsyncIncumbent };

inline std::string to_string(ExecPolicy p)
{
    return p == ExecPolicy::Sync ? "sync" : "async-incumbent";
}

// Raised when a task running under parallel_map throws. `period` is the
// lowest failing period index, independent of thread scheduling.
class WorkerError : public std::runtime_error {
public:
    WorkerError(int period_, const std::string& what_)
        : std::runtime_error("period " + std::to_string(period_) + ": " + what_),
          period(period_)
    {
    }
    int period;
};

struct WorkPlan {
    int workers = 1;
    ExecPolicy policy = ExecPolicy::Sync;
    std::vector<int> owner_of_period;  // period index -> worker index

    static WorkPlan round_robin(int periods, int workers, ExecPolicy policy = ExecPolicy::Sync)
    {
        if (workers < 1)
            throw ValidationError("work plan needs at least one worker");
        if (periods < 0)
            throw ValidationError("work plan needs a non-negative period count");
        WorkPlan plan;
        plan.workers = workers;
        plan.policy = policy;
        plan.owner_of_period.resize(periods);
        for (int p = 0; p < periods; ++p)
            plan.owner_of_period[p] = p % workers;
        return plan;
    }

    void validate(int periods) const
    {
        if (workers < 1)
            throw ValidationError("work plan needs at least one worker");
        if (static_cast<int>(owner_of_period.size()) != periods)
            throw ValidationError("work plan covers " +
                                  std::to_string(owner_of_period.size()) + " periods, expected " +
                                  std::to_string(periods));
        for (int p = 0; p < periods; ++p)
            if (owner_of_period[p] < 0 || owner_of_period[p] >= workers)
                throw ValidationError("period " + std::to_string(p) +
                                      " assigned to nonexistent worker " +
                                      std::to_string(owner_of_period[p]));
    }
};

// Runs fn(p) for p in [0, tasks), each period on its assigned worker, and
// returns results ordered by period index. Each worker walks its owned
// periods in ascending order. If any task throws, the exception from the
// lowest failing period is rethrown wrapped in WorkerError.
template <typename R>
std::vector<R> parallel_map(const WorkPlan& plan, int tasks, const std::function<R(int)>& fn)
{
    plan.validate(tasks);
    std::vector<R> results(tasks);
    std::vector<std::exception_ptr> errors(tasks);

    auto run_owned = [&](int worker) {
        for (int p = 0; p < tasks; ++p) {
            if (plan.owner_of_period[p] != worker)
                continue;
            try {
                results[p] = fn(p);
            } catch (...) {
                errors[p] = std::current_exception();
            }
        }
    };

    if (plan.workers == 1 || tasks <= 1) {
        for (int w = 0; w < plan.workers; ++w)
            run_owned(w);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(plan.workers);
        for (int w = 0; w < plan.workers; ++w)
            pool.emplace_back(run_owned, w);
        for (auto& t : pool)
            t.join();
    }

    for (int p = 0; p < tasks; ++p) {
        if (!errors[p])
            continue;
        try {
            std::rethrow_exception(errors[p]);
        } catch (const std::exception& e) {
            throw WorkerError(p, e.what());
        } catch (...) {
            throw WorkerError(p, "unknown failure");
        }
    }
    return results;
}

// Sequential left fold in index order. Used by the coordinator so that sums
// over periods are bitwise identical no matter how many workers solved them.
template <typename T, typename A, typename Op>
A ordered_reduce(const std::vector<T>& values, A init, Op op)
{
    A acc = std::move(init);
    for (const T& v : values)
        acc = op(std::move(acc), v);
    return acc;
}

// One-shot background task. launch() starts fn on a helper thread; wait()
// joins and rethrows anything fn threw. Used for the async incumbent policy,
// where the incumbent solve from iteration v is collected at the barrier of
// iteration v+1.
class Deferred {
public:
    Deferred() = default;
    Deferred(const Deferred&) = delete;
    Deferred& operator=(const Deferred&) = delete;
    ~Deferred() { join(); }

    void launch(std::function<void()> fn)
    {
        join();
        error_ = nullptr;
        worker_ = std::thread([this, fn = std::move(fn)]() {
            try {
                fn();
            } catch (...) {
                error_ = std::current_exception();
            }
        });
        active_ = true;
    }

    bool active() const { return active_; }

    void wait()
    {
        join();
        if (error_) {
            std::exception_ptr e = error_;
            error_ = nullptr;
            std::rethrow_exception(e);
        }
    }

private:
    void join()
    {
        if (worker_.joinable())
            worker_.join();
        active_ = false;
    }

    std::thread worker_;
    std::exception_ptr error_;
    bool active_ = false;
};

} // namespace battplan
