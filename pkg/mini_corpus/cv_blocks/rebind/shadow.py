import torch.nn as nn

LIMIT = 4
LIMIT = LIMIT * 2


class ShadowNet(nn.Module):
    groups = LIMIT

    def __init__(self):
        super().__init__()
        self.fc = nn.Linear(self.groups, self.groups)

    def forward(self, x):
        return self.fc(x)
