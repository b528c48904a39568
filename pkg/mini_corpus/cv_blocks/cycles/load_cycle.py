class CycleA(CycleB):
    kind = "a"


class CycleB(CycleA):
    kind = "b"
