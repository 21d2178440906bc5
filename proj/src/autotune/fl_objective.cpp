#include "fedsim/autotune/fl_objective.hpp"

#include "fedsim/errors.hpp"

namespace fedsim::autotune
{
    FlObjective::FlObjective(ConfigFactory factory, std::shared_ptr<const fedcore::World> world)
        : m_factory(std::move(factory)), m_world(std::move(world))
    {
        if (!m_factory || !m_world)
        {
            throw ValidationError("objective needs a config factory and a world");
        }
    }

    TrainOutcome FlObjective::train(const Assignment &assignment, const std::optional<msgflow::Bytes> &checkpoint,
                                    std::int64_t rounds) const
    {
        fedcore::CourseConfig cfg = m_factory(assignment);
        auto course = checkpoint ? fedcore::Course::restore(cfg, *m_world, *checkpoint, nullptr)
                                 : fedcore::Course(cfg, *m_world, nullptr);
        const std::int64_t start = course.server().version;
        course.run_until_round(start + rounds);
        TrainOutcome out;
        out.val_loss = course.evaluate_global(learnkit::Split::Validation).loss;
        out.rounds_total = course.server().version;
        out.checkpoint = course.checkpoint();
        return out;
    }
} // namespace fedsim::autotune
