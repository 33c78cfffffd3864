ELF   ��  binary payload ��