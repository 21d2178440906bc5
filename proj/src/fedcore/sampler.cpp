#include "fedsim/fedcore/sampler.hpp"

#include "fedsim/errors.hpp"

#include <algorithm>
#include <map>

namespace fedsim::fedcore
{
    namespace
    {
        void draw_uniform(std::vector<ParticipantId> candidates, std::size_t k, simnet::SeededRng &rng,
                          std::vector<ParticipantId> &out)
        {
            // Partial Fisher-Yates.
            for (std::size_t i = 0; i < k && i < candidates.size(); ++i)
            {
                const std::size_t j = i + rng.index(candidates.size() - i);
                std::swap(candidates[i], candidates[j]);
                out.push_back(candidates[i]);
            }
        }
    } // namespace

    ClientSampler::ClientSampler(SamplerKind kind, std::vector<simnet::ClientProfile> population)
        : m_kind(kind), m_population(std::move(population))
    {
        std::sort(m_population.begin(), m_population.end(),
                  [](const auto &a, const auto &b) { return a.client < b.client; });
        std::size_t num_groups = 1;
        if (const auto *g = std::get_if<GroupedSampler>(&m_kind))
        {
            num_groups = std::max<std::size_t>(1, g->num_groups);
        }
        std::vector<const simnet::ClientProfile *> order;
        for (const auto &p : m_population)
        {
            order.push_back(&p);
        }
        std::stable_sort(order.begin(), order.end(), [](const auto *a, const auto *b) {
            return a->speed_score() < b->speed_score();
        });
        m_groups.assign(num_groups, {});
        const std::size_t n = order.size();
        for (std::size_t i = 0; i < n; ++i)
        {
            m_groups[i * num_groups / std::max<std::size_t>(1, n)].push_back(order[i]->client);
        }
        for (auto &g : m_groups)
        {
            std::sort(g.begin(), g.end());
        }
    }

    std::vector<ParticipantId> ClientSampler::sample(const std::set<ParticipantId> &idle, std::size_t k,
                                                     simnet::SeededRng &rng, std::size_t group) const
    {
        if (k > idle.size())
        {
            throw InsufficientClients(k, idle.size());
        }
        std::vector<ParticipantId> out;
        out.reserve(k);
        if (std::holds_alternative<UniformSampler>(m_kind))
        {
            draw_uniform(std::vector<ParticipantId>(idle.begin(), idle.end()), k, rng, out);
        }
        else if (std::holds_alternative<ResponsivenessSampler>(m_kind))
        {
            std::map<ParticipantId, double> score;
            for (const auto &p : m_population)
            {
                score[p.client] = p.speed_score();
            }
            std::vector<ParticipantId> left(idle.begin(), idle.end());
            while (out.size() < k)
            {
                double total = 0.0;
                for (auto c : left)
                {
                    total += score.at(c);
                }
                double u = rng.uniform() * total;
                std::size_t pick = left.size() - 1;
                for (std::size_t i = 0; i < left.size(); ++i)
                {
                    u -= score.at(left[i]);
                    if (u < 0.0)
                    {
                        pick = i;
                        break;
                    }
                }
                out.push_back(left[pick]);
                left.erase(left.begin() + static_cast<std::ptrdiff_t>(pick));
            }
        }
        else
        {
            const std::size_t g = m_groups.size();
            for (std::size_t step = 0; step < g && out.size() < k; ++step)
            {
                std::vector<ParticipantId> candidates;
                for (auto c : m_groups[(group + step) % g])
                {
                    if (idle.contains(c))
                    {
                        candidates.push_back(c);
                    }
                }
                draw_uniform(std::move(candidates), k - out.size(), rng, out);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }
} // namespace fedsim::fedcore
