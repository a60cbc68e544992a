#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <type_traits>

namespace corobts {

using Index = std::uint32_t;
inline constexpr Index kNoIndex = UINT32_MAX;

inline constexpr std::size_t kMaxArity = 8;
inline constexpr std::size_t kPayloadBytes = 40;

using Payload = std::array<std::byte, kPayloadBytes>;

/// One PMA cell. Child positions are absolute cell indices; there are no
/// parent pointers.
struct Slot {
    Index relocation = kNoIndex; // new position, set only during a batch update
    std::array<Index, kMaxArity> children = filled_children();
    std::uint16_t depth = 0;
    std::uint8_t child_count = 0;
    bool occupied = false;
    Payload payload{};

    template <class T>
    [[nodiscard]] T load() const noexcept {
        static_assert(std::is_trivially_copyable_v<T> && sizeof(T) <= kPayloadBytes);
        T out;
        std::memcpy(&out, payload.data(), sizeof(T));
        return out;
    }

    template <class T>
    void store(const T& value) noexcept {
        static_assert(std::is_trivially_copyable_v<T> && sizeof(T) <= kPayloadBytes);
        std::memcpy(payload.data(), &value, sizeof(T));
    }

    [[nodiscard]] bool has_relocation() const noexcept { return relocation != kNoIndex; }

    static constexpr std::array<Index, kMaxArity> filled_children() noexcept {
        std::array<Index, kMaxArity> c{};
        c.fill(kNoIndex);
        return c;
    }
};

} // namespace corobts
