#pragma once

#include "fedsim/autotune/search.hpp"
#include "fedsim/fedcore/course.hpp"

#include <functional>
#include <memory>

namespace fedsim::autotune
{
    // Validation loss of the global model after training a course. The world
    // is built once and shared read-only; each call builds its own course.
    class FlObjective : public Objective
    {
    public:
        using ConfigFactory = std::function<fedcore::CourseConfig(const Assignment &)>;

        FlObjective(ConfigFactory factory, std::shared_ptr<const fedcore::World> world);

        TrainOutcome train(const Assignment &assignment, const std::optional<msgflow::Bytes> &checkpoint,
                           std::int64_t rounds) const override;

    private:
        ConfigFactory m_factory;
        std::shared_ptr<const fedcore::World> m_world;
    };
} // namespace fedsim::autotune
