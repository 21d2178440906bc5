#pragma once

namespace fedsim
{
    // Lambda overload set for std::visit.
    template <class... Ts>
    struct Overloaded : Ts...
    {
        using Ts::operator()...;
    };
    template <class... Ts>
    Overloaded(Ts...) -> Overloaded<Ts...>;
} // namespace fedsim
