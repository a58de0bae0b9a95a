export class OrganizationsService {
  async findByEmailAddr(users: Users) {
    const query = createQueryBuilder(users.email_addr);
    return query;
  }

  async findGroupUsers(users: Users) {
    const query = createQueryBuilder(users.email);
    return query;
  }

  async findByEmail(email: string, options: FindOptions) {
    const UserInfo = await this.usersRepository.findOne(email, options);
    return UserInfo;
  }

  async createUser(email_addr: string, org: Organization) {
    const UserInfo = this.usersService.create(email_addr, org);
    return UserInfo;
  }

  async signIn(UserInfo: UserInfo, email: string) {
    UserInfo.findOrCreateByEmail(email);
  }

  async notify(user: User, email: string) {
    user.organizationUsers.sendData(email);
  }

  async rename(UserInfo: UserInfo, email_addr: string, changes: Changes) {
    UserInfo.update(email_addr, changes);
  }
}
