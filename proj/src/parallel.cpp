#include "toricost/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace toricost
{

std::size_t worker_count()
{
    if (const char* env = std::getenv("TORICOST_THREADS"))
    {
        try
        {
            const long requested = std::stol(env);
            if (requested > 0)
                return static_cast<std::size_t>(requested);
        }
        catch (const std::exception&)
        {
            // fall through to the hardware default
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body)
{
    constexpr std::size_t min_chunk = 1024;
    const std::size_t workers
        = std::min(worker_count(), std::max<std::size_t>(1, count / min_chunk));
    if (workers <= 1)
    {
        body(0, count);
        return;
    }

    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    threads.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w)
    {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        threads.emplace_back([&, w, begin, end] {
            try
            {
                if (begin < end)
                    body(begin, end);
            }
            catch (...)
            {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

double pairwise_sum(const double* values, std::size_t count)
{
    if (count <= 8)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i)
            s += values[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

}  // namespace toricost
